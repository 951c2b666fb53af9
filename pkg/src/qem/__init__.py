# QEM package initialization
