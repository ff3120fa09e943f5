//! Linear relaxations of the bilinear model.
