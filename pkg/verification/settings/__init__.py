# Settings package for simulation configuration management
