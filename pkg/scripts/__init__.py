"""
Команды CLI: по одному скрипту на команду; main.py собирает их в подкоманды.
"""
