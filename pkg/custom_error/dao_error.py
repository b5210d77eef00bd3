class DaoError(Exception):
    """ 파일 계층 에러

    Raised when a matrix, vector, problem or config file cannot be read,
    does not match its schema or carries non-finite entries.
    """

    code = 'DAO_ERROR'

    def __init__(self, message, path = None):
        self.message = message
        self.path = path
        super().__init__(self.message)

    def __str__(self):
        return self.code
