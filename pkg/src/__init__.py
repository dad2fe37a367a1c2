# Lets the tests import the package as src.rankstat_mpc.
