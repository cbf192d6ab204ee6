//! Canonical specifications bundled with the fixtures.

/// Parameter scan over the SIR model, tab-indented as it is stored.
pub const SIR_SCAN: &str = "{
\t\"model\": {
\t\t\"modelPath\": \"./sir.mlrj\"
\t},
\t\"simulation\": {
\t\t\"simulator\": \"SSA\",
\t\t\"replications\": 100,
\t\t\"stopCondition\": {
\t\t\t\"stopTime\": 80
\t\t}
\t},
\t\"observation\": {
\t\t\"observables\": {
\t\t\t\"observationExpression\": [\"count(\\\"s\\\")\", \"count(\\\"i\\\")\", \"count(\\\"r\\\")\"],
\t\t\t\"observationAlias\": [\"susceptible\", \"infected\", \"recovered\"]
\t\t},
\t\t\"observationTime\": {
\t\t\t\"observationTime\": [0, 20, 40, 60, 80]
\t\t}
\t},
\t\"parameterScan\": {
\t\t\"factorName\": [\"k1\", \"k2\"],
\t\t\"factorMinimum\": [0.5, 0.5],
\t\t\"factorMaximum\": [2.0, 2.0],
\t\t\"interval\": [0.1, 0.1]
\t}
}";
