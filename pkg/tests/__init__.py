# cnetkat tests
