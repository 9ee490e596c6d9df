"""Research-community simulation as text message passing on agent-data graphs."""

__version__ = "0.1.0"
