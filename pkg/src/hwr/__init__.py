"""Writer-independent holistic handwritten-word recognizer.

Pipeline: preprocess word images to the canonical 64x128 grayscale raster,
extract HOG descriptors, reduce dimensionality (PCA or random projection),
classify with an MLP, RBF-SVM, or random forest, and interpret the predicted
class id as a Malayalam district name.
"""

__version__ = "0.1.0"
