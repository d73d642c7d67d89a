"""Следование по неявной кривой по направляющему векторному полю"""
