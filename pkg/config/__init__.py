"""
Конфигурация окружения (переменные OAMDET_*).
"""
