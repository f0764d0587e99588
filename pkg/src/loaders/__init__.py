"""Atomic writers for reports, traces and model artifacts"""
