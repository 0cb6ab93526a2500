##
import importlib

##
def load_model(opt, instance):
    """ Load model based on the model name.

    Arguments:
        opt {[argparse.Namespace]} -- options
        instance {[IsingInstance]} -- problem instance

    Returns:
        [model] -- Returned model
    """
    model_name = getattr(opt, 'model', 'sb')
    model_path = f"lib.models.{model_name}"
    model_lib  = importlib.import_module(model_path)
    model = getattr(model_lib, model_name.title())
    return model(opt, instance)
