import csv
import json
import logging
import os

import jsonschema
import numpy as np

from custom_error import DaoError

logger = logging.getLogger(__name__)

MATRIX_SCHEMA = {
    'type': 'object',
    'required': ['rows', 'cols', 'entries'],
    'properties': {
        'rows': {'type': 'integer', 'minimum': 1},
        'cols': {'type': 'integer', 'minimum': 0},
        'entries': {
            'type': 'array',
            'items': {
                'type': 'array',
                'items': {'type': 'number'},
                'minItems': 2,
                'maxItems': 2
            }
        }
    }
}


def format_complex(value):
    """ "re" for real entries, "re+imj" / "re-imj" otherwise """
    value = complex(value)
    if value.imag == 0:
        return repr(float(value.real))
    sign = '+' if value.imag >= 0 else '-'
    return f'{float(value.real)!r}{sign}{abs(float(value.imag))!r}j'


def parse_complex(text):
    text = text.strip().replace(' ', '')
    try:
        value = complex(text)
    except ValueError:
        raise DaoError(f'cannot parse complex entry {text!r}')
    if not (np.isfinite(value.real) and np.isfinite(value.imag)):
        raise DaoError(f'non-finite entry {text!r}')
    return value


class MatrixDao:
    """ 행렬 / 벡터 파일 입출력 (CSV, JSON) """

    def matrix_to_document(self, matrix):
        matrix = np.asarray(matrix, dtype = np.complex128)
        rows, cols = matrix.shape
        entries = [[float(v.real), float(v.imag)] for v in matrix.reshape(-1)]
        return {'rows': rows, 'cols': cols, 'entries': entries}

    def document_to_matrix(self, document):
        """
        JSON 문서를 행렬로 변환
            {"rows": m, "cols": n, "entries": [[re, im], ...]} in row-major order

        returns :
            complex128 ndarray of shape (rows, cols)
        """
        try:
            jsonschema.validate(document, MATRIX_SCHEMA)
        except jsonschema.ValidationError as e:
            raise DaoError(f'matrix document does not match schema: {e.message}')

        rows, cols = document['rows'], document['cols']
        entries = np.array(document['entries'], dtype = float).reshape(-1, 2)
        if entries.shape[0] != rows * cols:
            raise DaoError(f'expected {rows * cols} entries, found {entries.shape[0]}')
        if not np.all(np.isfinite(entries)):
            raise DaoError('matrix document has NaN or Inf entries')
        return (entries[:, 0] + 1j * entries[:, 1]).reshape(rows, cols)

    def read_matrix(self, path):
        if not os.path.exists(path):
            raise DaoError(f'no such file: {path}', path)

        if path.endswith('.json'):
            try:
                with open(path) as f:
                    document = json.load(f)
            except json.JSONDecodeError as e:
                raise DaoError(f'{path}: invalid JSON ({e.msg})', path)
            return self.document_to_matrix(document)

        with open(path, newline = '') as f:
            rows = [row for row in csv.reader(f) if row and any(cell.strip() for cell in row)]
        if not rows:
            raise DaoError(f'{path}: empty matrix file', path)
        width = len(rows[0])
        if any(len(row) != width for row in rows):
            raise DaoError(f'{path}: ragged rows', path)
        matrix = np.array([[parse_complex(cell) for cell in row] for row in rows], dtype = np.complex128)
        logger.debug('read %dx%d matrix from %s', matrix.shape[0], matrix.shape[1], path)
        return matrix

    def read_vector(self, path):
        matrix = self.read_matrix(path)
        if min(matrix.shape) != 1:
            raise DaoError(f'{path}: expected a single row or column, got {matrix.shape}', path)
        return matrix.reshape(-1)

    def write_matrix(self, path, matrix, fmt = 'json'):
        matrix = np.atleast_2d(np.asarray(matrix, dtype = np.complex128))
        if fmt == 'json':
            with open(path, 'w') as f:
                json.dump(self.matrix_to_document(matrix), f, indent = 2)
                f.write('\n')
            return

        with open(path, 'w', newline = '') as f:
            writer = csv.writer(f)
            for row in matrix:
                writer.writerow([format_complex(v) for v in row])

    def write_vector(self, path, vector, fmt = 'json'):
        self.write_matrix(path, np.asarray(vector).reshape(-1, 1), fmt)
