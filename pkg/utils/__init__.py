"""
Утилиты проекта: логирование и исключения.
"""
