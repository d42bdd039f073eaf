"""Decision tools for the eventually-fragment of intuitionistic temporal logic over expanding posets."""

__version__ = "0.1.0"
