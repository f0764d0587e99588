"""File readers: CI traces and YAML configs"""
