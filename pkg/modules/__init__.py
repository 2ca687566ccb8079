"""q-exponential evaluation, remainders, Turán verdicts and grid scans."""
