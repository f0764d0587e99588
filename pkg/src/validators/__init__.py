"""Record validators for configs and traces"""
