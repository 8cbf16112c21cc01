"""Jump-channel statistics of monitored open quantum systems"""
__version__ = "1.0.0"
