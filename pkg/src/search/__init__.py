"""Mapping search: value function, space partitioning, tree search and tailored search"""
