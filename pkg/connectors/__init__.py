"""
Файловые коннекторы: архивы .npz, датасеты, чекпоинты, конфиги и артефакты запусков.
"""
