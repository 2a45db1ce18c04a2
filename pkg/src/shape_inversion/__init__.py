"""Shape-constrained inversion of first-kind integral transforms."""
from importlib.resources import files as package_data

data_dir = package_data(__package__) / "data"
