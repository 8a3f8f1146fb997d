# Concurrent sweep runner
