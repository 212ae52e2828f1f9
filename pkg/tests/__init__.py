# Tests package for the metric graph simulator
