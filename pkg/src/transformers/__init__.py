"""Report shaping: per-day rows and normalized comparisons"""
