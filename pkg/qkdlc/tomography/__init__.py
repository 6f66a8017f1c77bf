"""
Line tomography: reflectogram synthesis and fitting, fit accuracy
calibration, and modulated transmittometry.
"""
from .accuracy import AccuracyReport, RecoveryReport, detection_accuracy, recovery_rate
from .reflectogram import Reflectogram, Tomogram, compare_leaks, fit_tomogram, synth_reflectogram
from .transmittometry import TransmittometryConfig, naive_rms_estimate, transmittometry_estimate
