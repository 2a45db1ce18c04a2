"""Library code behind the shape_inversion commands."""
