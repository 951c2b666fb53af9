# Calibration package initialization
