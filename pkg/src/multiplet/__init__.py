# Multiplet package initialization
