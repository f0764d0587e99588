"""Runtime manager, baseline policies and the scenario simulator"""
