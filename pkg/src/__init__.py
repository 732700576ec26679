"""otfmri - optimal-transport GAN enhancement of surface-mapped fMRI"""

__version__ = "1.0.0"
__author__ = "otfmri Development Team"
