import logging
from datetime import datetime

import pandas as pd

from utils.settings import CSV_COLUMNS, SHARPNESS_COLUMNS

logger = logging.getLogger(__name__)

# 17 significant digits reproduce every double exactly
FLOAT_FORMAT = '%.17g'

_COLUMN_TYPES = {
    'kind': str, 'q': float, 'n': int, 'z': float, 'ratio': float, 'lower_constant': float,
    'lower_margin': float, 'upper_margin': float, 'error_budget': float, 'outcome': str,
}


class DataExporter:
    """Export scan records and sharpness sweeps to CSV and Excel"""

    def _write_csv(self, df, target):
        df.to_csv(target, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')

    def records_frame(self, records):
        """DataFrame with exactly the record columns, in scan order"""
        return pd.DataFrame([r.to_row() for r in records], columns=CSV_COLUMNS)

    def export_records_to_csv(self, records, target):
        """Export scan records; target is a path or an open text stream"""
        try:
            self._write_csv(self.records_frame(records), target)
            logger.info(f"Exported {len(records)} record(s) to CSV: {getattr(target, 'name', target)}")
            return target

        except OSError as e:
            logger.error(f"Error exporting records to CSV: {e}")
            raise e

    def export_sharpness_to_csv(self, points, target):
        """Export sharpness points as z, ratio, best_constant, deviation"""
        try:
            rows = [{'z': p.z, 'ratio': p.ratio, 'best_constant': p.best_constant,
                     'deviation': p.deviation} for p in points]
            self._write_csv(pd.DataFrame(rows, columns=SHARPNESS_COLUMNS), target)
            logger.info(f"Exported {len(rows)} sharpness point(s) to CSV: {getattr(target, 'name', target)}")
            return target

        except OSError as e:
            logger.error(f"Error exporting sharpness data to CSV: {e}")
            raise e

    def export_to_excel(self, records, summary, filename):
        """Export records plus a Summary sheet to an xlsx workbook"""
        try:
            df = self.records_frame(records)

            with pd.ExcelWriter(filename, engine='openpyxl') as writer:
                df.to_excel(writer, sheet_name='Records', index=False)

                summary_data = dict(summary.as_dict())
                summary_data['Export Date'] = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
                summary_df = pd.DataFrame({k: [v] for k, v in summary_data.items()})
                summary_df.to_excel(writer, sheet_name='Summary', index=False)

            logger.info(f"Data exported to Excel: {filename}")
            return filename

        except OSError as e:
            logger.error(f"Error exporting to Excel: {e}")
            raise e


def load_records_csv(path):
    """Parse a records CSV back into ScanRecords, bit-identical to what was written"""
    from modules.scanner import ScanRecord

    try:
        df = pd.read_csv(path, dtype=_COLUMN_TYPES, float_precision='round_trip',
                         keep_default_na=False, na_values=['nan'])
    except OSError as e:
        logger.error(f"Error reading records CSV: {e}")
        raise e

    if list(df.columns) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {list(df.columns)}")
    records = []
    for row in df.itertuples(index=False):
        values = row._asdict()
        values['n'] = int(values['n'])
        for name in ('q', 'z', 'ratio', 'lower_constant', 'lower_margin', 'upper_margin', 'error_budget'):
            values[name] = float(values[name])
        records.append(ScanRecord(**values))
    return records
