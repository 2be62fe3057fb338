"""Pearl necklaces of 3-spheres around spun knots in S^4 and their reflection groups."""
__version__ = "0.1.0"
