"""
Configuration Package
Application identity and the run settings layer
"""

APP_NAME = "bogofluct"
APP_VERSION = "1.0.0"
