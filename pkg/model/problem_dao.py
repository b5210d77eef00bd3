import json
import logging
import os

import jsonschema

from custom_error import DaoError, ServiceError
from model.entities import Dictionary, ExperimentConfig, SeparationProblem
from model.matrix_dao import MATRIX_SCHEMA
from model.report_dao import to_document

logger = logging.getLogger(__name__)

VECTOR_SCHEMA = {
    'type': 'array',
    'items': {
        'type': 'array',
        'items': {'type': 'number'},
        'minItems': 2,
        'maxItems': 2
    }
}

PROBLEM_SCHEMA = {
    '$schema': 'http://json-schema.org/draft-07/schema#',
    'type': 'object',
    'required': ['A', 'B', 'w'],
    'properties': {
        'A': MATRIX_SCHEMA,
        'B': MATRIX_SCHEMA,
        'w': VECTOR_SCHEMA,
        'sparsity_s': {'type': 'integer', 'minimum': 0},
        'planted_y': {'oneOf': [VECTOR_SCHEMA, {'type': 'null'}]},
        'planted_z': {'oneOf': [VECTOR_SCHEMA, {'type': 'null'}]}
    }
}

EXPERIMENT_SCHEMA = {
    '$schema': 'http://json-schema.org/draft-07/schema#',
    'type': 'object',
    'required': ['name'],
    'properties': {
        'name': {'enum': ['counterexample', 'injectivity', 'com-mc', 'sieve', 'boxdim']},
        'seed': {'type': 'integer'},
        'params': {'type': 'object'}
    },
    'additionalProperties': False
}


def _vector(pairs):
    return [complex(re, im) for re, im in pairs]


class ProblemDao:
    """ SeparationProblem / SeparationSolution / ExperimentConfig JSON 입출력 """

    def __init__(self, matrix_dao, column_norm_tolerance = 1e-8):
        self.matrix_dao = matrix_dao
        self.column_norm_tolerance = column_norm_tolerance

    def _load(self, path, schema):
        if not os.path.exists(path):
            raise DaoError(f'no such file: {path}', path)
        try:
            with open(path) as f:
                document = json.load(f)
        except json.JSONDecodeError as e:
            raise DaoError(f'{path}: invalid JSON ({e.msg})', path)
        try:
            jsonschema.validate(document, schema)
        except jsonschema.ValidationError as e:
            raise DaoError(f'{path}: {e.message}', path)
        return document

    def document_to_problem(self, document):
        try:
            jsonschema.validate(document, PROBLEM_SCHEMA)
        except jsonschema.ValidationError as e:
            raise DaoError(f'problem document does not match schema: {e.message}')

        A = self.matrix_dao.document_to_matrix(document['A'])
        B = self.matrix_dao.document_to_matrix(document['B'])
        try:
            return SeparationProblem(
                A = Dictionary(A, self.column_norm_tolerance),
                B = Dictionary(B, self.column_norm_tolerance),
                w = _vector(document['w']),
                sparsity_s = document.get('sparsity_s', 1),
                planted_y = None if document.get('planted_y') is None else _vector(document['planted_y']),
                planted_z = None if document.get('planted_z') is None else _vector(document['planted_z'])
            )
        except ServiceError as e:
            raise DaoError(f'invalid separation problem: {e.message}')

    def problem_to_document(self, problem):
        return {
            'A': self.matrix_dao.matrix_to_document(problem.A.matrix),
            'B': self.matrix_dao.matrix_to_document(problem.B.matrix),
            'w': to_document(problem.w),
            'sparsity_s': int(problem.sparsity_s),
            'planted_y': to_document(problem.planted_y),
            'planted_z': to_document(problem.planted_z)
        }

    def read_problem(self, path):
        problem = self.document_to_problem(self._load(path, {'type': 'object'}))
        logger.debug('read separation problem %dx(%d+%d) from %s', problem.A.rows, problem.A.cols, problem.B.cols, path)
        return problem

    def write_problem(self, path, problem):
        document = self.problem_to_document(problem)
        if not path or path == '-':
            return json.dumps(document, sort_keys = True, indent = 2)
        with open(path, 'w') as f:
            json.dump(document, f, sort_keys = True, indent = 2)
            f.write('\n')
        return None

    def read_experiment_config(self, path):
        document = self._load(path, EXPERIMENT_SCHEMA)
        return ExperimentConfig(document['name'], document.get('seed', 0), document.get('params', {}))
