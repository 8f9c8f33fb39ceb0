from .settings import VERSION as __version__  # noqa: F401
