# Services package for the graph filter lab
