"""Domain types"""
