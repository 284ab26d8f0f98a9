"""ltlab: formal group laws, Morava stabilizer arithmetic and Lubin-Tate actions."""

__version__ = "0.1.0"
