"""
Persistence of invariant reports
"""
import json
from datetime import datetime

REPORT_SCHEMA = 1


class ReportStore:
    def __init__(self, report_file='calabi_reports.json'):
        self.report_file = report_file
        self.state = self._load_state()

    def _empty_state(self):
        return {
            'schema': REPORT_SCHEMA,
            'reports': {},
            'total_runs': 0,
            'total_failures': 0,
            'last_updated': None
        }

    def _load_state(self):
        """Load stored reports or start empty"""
        try:
            with open(self.report_file, 'r', encoding='utf-8') as f:
                state = json.load(f)
        except (FileNotFoundError, json.JSONDecodeError):
            return self._empty_state()
        if state.get('schema') != REPORT_SCHEMA:
            return self._empty_state()
        return state

    def save_state(self):
        with open(self.report_file, 'w', encoding='utf-8') as f:
            json.dump(self.state, f, indent=4)

    def record(self, name, report):
        """Store a report (an InvariantReport or its dict) under a name and save"""
        data = report.to_dict() if hasattr(report, 'to_dict') else dict(report)
        self.state['reports'][name] = data
        self.state['total_runs'] += 1
        if not data.get('passed', False):
            self.state['total_failures'] += 1
        self.state['last_updated'] = datetime.now().isoformat()
        self.save_state()
        return data

    def get_report(self, name):
        return self.state['reports'].get(name)

    def get_state(self):
        """Get a copy of the stored state"""
        return json.loads(json.dumps(self.state))

    def payload(self):
        """The stored state minus the wall-clock timestamp; equal for identical runs"""
        state = self.get_state()
        state.pop('last_updated', None)
        return state

    def reset_state(self):
        self.state = self._empty_state()
        self.save_state()
