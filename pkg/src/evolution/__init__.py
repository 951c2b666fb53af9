# Evolution package initialization
