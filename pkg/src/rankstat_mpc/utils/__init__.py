# Utils package for rankstat-mpc
