# Multi-scale KAM engine
__version__ = "0.1.0"
