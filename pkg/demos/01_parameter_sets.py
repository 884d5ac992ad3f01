"""The eight built-in parameter sets.

P0 is the baseline; every other set changes exactly one field.  This
prints the baseline record and, for each variant, the field it changes.
"""

from pedsim.params import ParameterSetId, builtin_parameter_set, parameter_delta, validate_params

baseline = builtin_parameter_set("P0")
print("baseline record:")
for line in baseline.as_lines():
    print("  " + line)

print("\nvariants:")
for set_id in ParameterSetId:
    delta = parameter_delta(set_id)
    if delta is None:
        continue
    name, value = delta
    print(f"  {set_id.value}: {name} {getattr(baseline, name)} -> {value}")

# validation reports one message per broken invariant
broken = baseline.with_(radius=-0.1, lambda_anisotropy=1.5)
print("\nvalidation of a broken record:")
for message in validate_params(broken):
    print("  " + message)
