namespace wrinkle {}
