"""twistfold: exact twist-deformed differential geometry on level-set
submanifolds of R^n, with a scenario-driven CLI."""

__version__ = "0.1.0"
