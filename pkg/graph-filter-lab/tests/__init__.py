# Tests package for the graph filter lab
