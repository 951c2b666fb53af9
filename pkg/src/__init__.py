# Noise model package initialization
