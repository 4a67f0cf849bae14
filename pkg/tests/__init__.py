"""
Tests package for the RSS localization toolkit.
"""
