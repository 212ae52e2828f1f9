# Reporting package for verification artifacts (CSV, summary, xlsx)
