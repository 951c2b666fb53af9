# Kernel package initialization
