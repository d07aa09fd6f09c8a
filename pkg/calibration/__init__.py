"""Device noise models and calibration time series"""
