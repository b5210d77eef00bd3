from .matrix_dao import MatrixDao
from .problem_dao import ProblemDao
from .report_dao import ReportDao

__all__ = [
    'MatrixDao',
    'ProblemDao',
    'ReportDao'
]
