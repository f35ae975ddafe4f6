from hypothesis import settings

settings.register_profile("artifact", derandomize=True, max_examples=100)
settings.load_profile("artifact")
