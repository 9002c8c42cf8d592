# Mixed radial-angular inequality lab
__version__ = "1.0.0"
