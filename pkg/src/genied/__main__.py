import sys

from .cli import main_daemon

if __name__ == "__main__":
    sys.exit(main_daemon())
