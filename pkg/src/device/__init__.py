"""Edge server model: components, operating modes, mappings and the measurement oracle"""
