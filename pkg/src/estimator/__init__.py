"""Quantile-class latency/power estimator"""
