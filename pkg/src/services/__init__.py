# Metric, copula and simulation services
