"""
rtctimes Utilities

Contains the analysis modules behind the rtctimes command line:
- task_model: tasks, task sets, utilization and hyperperiod
- parser: exact rationals and task-set files
- fp_analysis: Fixed Priority schedulability points, tests and regions
- edf_analysis: EDF deadline sets, tests and minimal deadline sets
- region_geometry: constraint rows, polytopes, and/or regions, vertices
- lp_solver: exact simplex and redundancy elimination
- optimizer: linear-reward maximization over FP and EDF regions
- simulator: preemptive FP/EDF schedule simulation
- formatters: report text, CSV and SVG output
- experiment: the randomized |D_min| versus hyperperiod experiment
- errors: the exception hierarchy
"""
