"""LOUPE: learned k-space under-sampling masks and residual U-Net reconstruction"""
