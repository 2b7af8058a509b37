from .client import ResmanClient, ServerError, client_submit
from .server import ResourceManagerServer, serve

__all__ = ["ResmanClient", "ServerError", "client_submit",
           "ResourceManagerServer", "serve"]
