"""
Ветви модели: OAM (первая, 1B) и fully supervised (вторая, 2B),
а также оценщики боксов для инференса и псевдо-разметки.
"""
