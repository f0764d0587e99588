"""
Carbon-aware multi-DNN edge runtime simulator
"""

__version__ = "0.1.0"
