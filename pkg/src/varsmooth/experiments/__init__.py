"""Reproduction harnesses: L1 image deblurring and hinge-loss kernel SVM."""

from .data import SvmDataset, add_gaussian_noise, make_blobs, make_phantom
from .deblur import DeblurInstance, deblur_true_objective, isnr, make_deblur_instance, run_deblur
from .svm import ClassifierModel, VariableSmoothingSVC, kfold_cv, predict, train_svm
