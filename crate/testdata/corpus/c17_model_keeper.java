class ModelKeeper {
    private Model dataModel;
    private Model tempModel;

    private void persist() {
        dataModel.save();
    }

    private void discard() {
        tempModel.drop();
    }

    public void checkpoint() {
        // <start>
        model.save();
        model.load();
        // <end>
    }
}
