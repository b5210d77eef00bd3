import csv
import datetime
import io
import json
import logging
import os

import attr
import numpy as np

from custom_error import DaoError
from model.entities import Dictionary, IndexSet

logger = logging.getLogger(__name__)

TIMESTAMP_FIELDS = ('created_at', 'wall_time')


def to_document(value):
    """
    report 객체를 JSON 으로 직렬화 가능한 값으로 변환
        attrs classes    -> dict of their fields
        complex numbers  -> [re, im]
        ndarray          -> list (complex entries as [re, im])
        IndexSet         -> 1-based member list
        Dictionary       -> its matrix
    """
    if isinstance(value, IndexSet):
        return value.one_based()
    if isinstance(value, Dictionary):
        return to_document(value.matrix)
    if attr.has(type(value)):
        # solver traces go to their own sidecar file
        return {field.name: to_document(getattr(value, field.name))
                for field in attr.fields(type(value)) if not field.metadata.get('sidecar')}
    if isinstance(value, dict):
        return {str(key): to_document(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_document(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_document(item) for item in value.tolist()]
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON has no Inf; unbounded values are written as null
        return value if np.isfinite(value) else None
    return value


def strip_timestamps(document):
    if isinstance(document, dict):
        return {key: strip_timestamps(item) for key, item in document.items() if key not in TIMESTAMP_FIELDS}
    if isinstance(document, list):
        return [strip_timestamps(item) for item in document]
    return document


def flatten(document, prefix = ''):
    """ nested report -> [(dotted key, value)] rows for CSV """
    if isinstance(document, dict):
        rows = []
        for key in sorted(document):
            rows.extend(flatten(document[key], f'{prefix}.{key}' if prefix else key))
        return rows
    if isinstance(document, list) and document and isinstance(document[0], (dict, list)):
        rows = []
        for i, item in enumerate(document):
            rows.extend(flatten(item, f'{prefix}.{i}'))
        return rows
    return [(prefix, json.dumps(document) if isinstance(document, list) else document)]


class ReportDao:
    def dumps(self, report, timestamp = True):
        document = to_document(report)
        if isinstance(document, dict) and timestamp:
            document['created_at'] = datetime.datetime.now(datetime.timezone.utc).isoformat()
        if not timestamp:
            document = strip_timestamps(document)
        return json.dumps(document, sort_keys = True, indent = 2)

    def dumps_csv(self, report, timestamp = True):
        """ flattened key,value rows of the report """
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator = '\n')
        writer.writerow(['key', 'value'])
        writer.writerows(flatten(json.loads(self.dumps(report, timestamp))))
        return buffer.getvalue()

    def write_report(self, path, report, fmt = 'json', timestamp = True):
        """
        report 파일 저장

        args :
            path      : output file, '-' or None for the returned string only
            report    : attrs entity or plain mapping
            fmt       : 'json' or 'csv' (flattened key,value rows)
            timestamp : add created_at and keep wall_time

        returns :
            the report text in the requested format
        """
        if fmt == 'csv':
            text = self.dumps_csv(report, timestamp)
        else:
            text = self.dumps(report, timestamp) + '\n'
        if not path or path == '-':
            return text

        try:
            with open(path, 'w', newline = '') as f:
                f.write(text)
        except OSError as e:
            raise DaoError(f'cannot write {path}: {e.strerror}', path)

        logger.info('wrote %s report to %s', fmt, path)
        return text

    def trace_path(self, path):
        root, _ = os.path.splitext(path)
        return root + '.trace.json'

    def write_trace(self, path, trace, iterations, status):
        """ solver residual trace sidecar next to the solution file """
        document = {
            'iterations': int(iterations),
            'status': status,
            'residuals': [{'primal': primal, 'dual': dual} for primal, dual in (trace or [])]
        }
        sidecar = self.trace_path(path)
        try:
            with open(sidecar, 'w') as f:
                json.dump(document, f, sort_keys = True, indent = 2)
                f.write('\n')
        except OSError as e:
            raise DaoError(f'cannot write {sidecar}: {e.strerror}', sidecar)
        return sidecar
