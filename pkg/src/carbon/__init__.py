"""Carbon intensity, forecasts, power-cap policy and emissions accounting"""
