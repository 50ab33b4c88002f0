"""Services package - k-space operators, masks, reconstruction network, training and evaluation"""
