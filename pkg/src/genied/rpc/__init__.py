from .dispatch import Dispatcher
from .server import OwnerLoop, StdioServer, WebSocketServer

__all__ = ["Dispatcher", "OwnerLoop", "StdioServer", "WebSocketServer"]
