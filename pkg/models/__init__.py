"""
Pydantic-модели предметной области: геометрия, синтетический мир, обучение, пул, оценка.
"""
