# Utils package for the graph filter lab
