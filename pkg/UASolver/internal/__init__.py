"""Internal code that is used by keywords in UASolver.keywords.*"""
