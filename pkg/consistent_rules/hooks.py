app_name = "consistent_rules"
app_title = "Consistent Rules"
app_description = "Multi-objective evolution of consistent interval rule sets for multi-label classification"
app_license = "mit"

# Archives
# ------------------

# bumped whenever the JSON model archive layout changes
archive_format_version = 1

# sentinels used for infinite feature-test bounds in archives and reports
negative_infinity = "-inf"
positive_infinity = "+inf"

# Datasets
# ------------------

# candidate values for the t sweep
t_sweep_values = [2, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096]

# Logging
# ------------------

# titles bound to loguru records for failed user-facing operations
dataset_issue_title = "Dataset Issue"
evolution_issue_title = "Evolution Issue"
archive_issue_title = "Archive Issue"
