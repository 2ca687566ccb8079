class RecordFilter:
    """Filter scan records based on various criteria"""

    def __init__(self, records):
        self.original_data = list(records)
        self.filtered_data = list(records)
        self.applied_filters = []

    def filter_by_outcome(self, outcome):
        """Filter by verdict outcome (certified, violated, indeterminate)"""
        if not outcome:
            return self

        outcome = outcome.lower()
        self.filtered_data = [r for r in self.filtered_data if r.outcome == outcome]
        self.applied_filters.append(f"Outcome: {outcome}")
        return self

    def filter_by_margin_below(self, threshold):
        """Keep records whose smaller margin lies below threshold"""
        if threshold is None:
            return self

        self.filtered_data = [r for r in self.filtered_data
                              if min(r.lower_margin, r.upper_margin) < threshold]
        self.applied_filters.append(f"Margin below: {threshold:g}")
        return self

    def get_results(self):
        """Get filtered results"""
        return self.filtered_data

    def get_stats(self):
        """Get filtering statistics"""
        return {
            'original_count': len(self.original_data),
            'filtered_count': len(self.filtered_data),
            'applied_filters': self.applied_filters,
            'filter_effectiveness': len(self.filtered_data) / len(self.original_data) if self.original_data else 0
        }
