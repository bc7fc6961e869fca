# ROSS-PUF photonic key generator
__version__ = "1.0.0"
