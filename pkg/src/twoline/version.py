'''
Version of the twoline dividend solver
'''

__version__ = '0.1.0'
