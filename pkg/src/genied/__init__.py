"""genied: an editor-agnostic proactive coding-assistant daemon.

Watches mirrored documents and chat activity, decides when the user has
gone quiet enough to deserve unsolicited help, asks an LLM for a group of
up to three typed suggestions, manages their lifecycle inside a chat
session, and accounts for what the proactivity costs.
"""

__version__ = "0.1.0"
