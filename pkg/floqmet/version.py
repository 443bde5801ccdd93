"""Version information for floqmet."""
VERSION = (2024, 1)
VERSION_TEXT = ".".join(str(i) for i in VERSION)
